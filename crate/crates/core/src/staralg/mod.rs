//! Words in `p_v, s_e, s_e*`, rewriting to the spanning monomials
//! `s_μ s_ν*`, and evaluation in concrete families.

mod free;
mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::family::OperatorFamily;
use crate::graph::{EdgeId, Graph, Path, VertexId};
use crate::linalg::{adjoint, zeros, CMat};

pub use free::{FreeElement, FreeWord};
pub use parse::{parse_expression, parse_word, Expression};

/// Relative purge threshold for coefficients.
pub const PURGE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gen {
    P(VertexId),
    S(EdgeId),
    SStar(EdgeId),
}

impl Gen {
    pub fn adjoint(self) -> Gen {
        match self {
            Gen::P(v) => Gen::P(v),
            Gen::S(e) => Gen::SStar(e),
            Gen::SStar(e) => Gen::S(e),
        }
    }

    pub fn render(self, g: &Graph) -> String {
        match self {
            Gen::P(v) => format!("p({})", g.vertex_name(v)),
            Gen::S(e) => format!("s({})", g.edge_name(e)),
            Gen::SStar(e) => format!("s*({})", g.edge_name(e)),
        }
    }

    fn check(self, g: &Graph) -> Result<()> {
        let ok = match self {
            Gen::P(v) => v.0 < g.vertex_count(),
            Gen::S(e) | Gen::SStar(e) => e.0 < g.edge_count(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("generator {self:?} is not in the graph")))
        }
    }
}

/// `s_μ s_ν*` with `s(μ) = s(ν)`. `p_v = (v, v)`, `s_e = (e, s(e))`,
/// `s_e* = (s(e), e)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    mu: Path,
    nu: Path,
}

impl Monomial {
    pub fn new(mu: Path, nu: Path) -> Result<Self> {
        if mu.source() != nu.source() {
            return Err(Error::Invalid("monomial needs s(μ) = s(ν)".into()));
        }
        Ok(Monomial { mu, nu })
    }

    pub fn vertex(v: VertexId) -> Self {
        Monomial {
            mu: Path::vertex(v),
            nu: Path::vertex(v),
        }
    }

    pub fn edge(g: &Graph, e: EdgeId) -> Self {
        Monomial {
            mu: Path::edge(g, e),
            nu: Path::vertex(g.src(e)),
        }
    }

    pub fn edge_adjoint(g: &Graph, e: EdgeId) -> Self {
        Self::edge(g, e).adjoint()
    }

    pub fn mu(&self) -> &Path {
        &self.mu
    }

    pub fn nu(&self) -> &Path {
        &self.nu
    }

    pub fn is_vertex(&self) -> bool {
        self.mu.is_vertex() && self.nu.is_vertex()
    }

    pub fn degree(&self) -> usize {
        self.mu.len() + self.nu.len()
    }

    pub fn adjoint(&self) -> Monomial {
        Monomial {
            mu: self.nu.clone(),
            nu: self.mu.clone(),
        }
    }

    /// `(s_μ s_ν*)(s_α s_β*)`, which is again a monomial or zero.
    pub fn product(&self, other: &Monomial) -> Option<Monomial> {
        if let Some(rest) = other.mu.strip_range_prefix(&self.nu) {
            let mu = self.mu.compose(&rest)?;
            return Some(Monomial {
                mu,
                nu: other.nu.clone(),
            });
        }
        if let Some(rest) = self.nu.strip_range_prefix(&other.mu) {
            let nu = other.nu.compose(&rest)?;
            return Some(Monomial {
                mu: self.mu.clone(),
                nu,
            });
        }
        None
    }

    /// Generator word spelling this monomial.
    pub fn word(&self) -> Vec<Gen> {
        if self.is_vertex() {
            return vec![Gen::P(self.mu.source())];
        }
        let mut out: Vec<Gen> = self.mu.steps().iter().rev().map(|&e| Gen::S(e)).collect();
        out.extend(self.nu.steps().iter().map(|&e| Gen::SStar(e)));
        out
    }

    /// `S_μ S_ν*` with no extra projection factors, so single generators
    /// evaluate to the stored matrices exactly.
    pub fn evaluate(&self, fam: &OperatorFamily) -> CMat {
        if self.is_vertex() {
            return fam.p(self.mu.source()).clone();
        }
        let chain = |p: &Path| -> Option<CMat> {
            let mut steps = p.steps().iter();
            let first = steps.next()?;
            let mut out = fam.s(*first).clone();
            for &e in steps {
                out = fam.s(e) * out;
            }
            Some(out)
        };
        match (chain(&self.mu), chain(&self.nu)) {
            (Some(a), None) => a,
            (None, Some(b)) => adjoint(&b),
            (Some(a), Some(b)) => a * adjoint(&b),
            (None, None) => unreachable!("vertex case handled"),
        }
    }

    pub fn render(&self, g: &Graph) -> String {
        self.word()
            .iter()
            .map(|x| x.render(g))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Action on a basis vector of the untruncated Fock space.
    pub fn fock_action(&self, lambda: &Path) -> Option<Path> {
        let rest = lambda.strip_range_prefix(&self.nu)?;
        self.mu.compose(&rest)
    }
}

/// Finite linear combination of monomials over one graph.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgElement {
    graph: Arc<Graph>,
    terms: BTreeMap<Monomial, Complex64>,
}

impl AlgElement {
    pub fn zero(graph: Arc<Graph>) -> Self {
        AlgElement {
            graph,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(graph: Arc<Graph>, m: Monomial, c: Complex64) -> Self {
        let mut out = Self::zero(graph);
        out.terms.insert(m, c);
        out.purge();
        out
    }

    pub fn generator(graph: Arc<Graph>, x: Gen) -> Result<Self> {
        x.check(&graph)?;
        let m = match x {
            Gen::P(v) => Monomial::vertex(v),
            Gen::S(e) => Monomial::edge(&graph, e),
            Gen::SStar(e) => Monomial::edge_adjoint(&graph, e),
        };
        Ok(Self::monomial(graph, m, Complex64::new(1.0, 0.0)))
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Complex64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    fn purge(&mut self) {
        let largest = self.terms.values().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = PURGE * largest;
        self.terms.retain(|_, c| c.norm() > cut && c.norm() > 0.0);
    }

    pub fn add(&self, other: &AlgElement) -> Result<AlgElement> {
        if *self.graph != *other.graph {
            return Err(Error::GraphMismatch);
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            *out.terms.entry(m.clone()).or_default() += c;
        }
        out.purge();
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> AlgElement {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out.purge();
        out
    }

    pub fn adjoint(&self) -> AlgElement {
        AlgElement {
            graph: self.graph.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.adjoint(), c.conj())).collect(),
        }
    }

    pub fn evaluate(&self, fam: &OperatorFamily) -> Result<CMat> {
        if *fam.graph() != *self.graph {
            return Err(Error::GraphMismatch);
        }
        let d = fam.dim();
        let mut out = zeros(d, d);
        for (m, c) in &self.terms {
            let x = m.evaluate(fam);
            if *c == Complex64::new(1.0, 0.0) {
                out += x;
            } else {
                out += x * *c;
            }
        }
        Ok(out)
    }

    /// Action on `ξ_λ` in the untruncated Fock space, as a sparse vector.
    pub fn fock_action(&self, lambda: &Path) -> BTreeMap<Path, Complex64> {
        let mut out: BTreeMap<Path, Complex64> = BTreeMap::new();
        for (m, c) in &self.terms {
            if let Some(p) = m.fock_action(lambda) {
                *out.entry(p).or_default() += c;
            }
        }
        out.retain(|_, c| c.norm() > 0.0);
        out
    }

    pub fn render(&self) -> String {
        render_terms(self.terms.iter().map(|(m, c)| (m.render(&self.graph), *c)))
    }
}

fn format_real(x: f64) -> String {
    format!("{x}")
}

/// Coefficient-prefixed sum, re-parseable by [`parse_expression`].
pub(crate) fn render_terms(terms: impl Iterator<Item = (String, Complex64)>) -> String {
    let mut out = String::new();
    for (body, c) in terms {
        let (neg, mag) = if c.im == 0.0 && c.re < 0.0 {
            (true, Complex64::new(-c.re, 0.0))
        } else if c.re == 0.0 && c.im < 0.0 {
            (true, Complex64::new(0.0, -c.im))
        } else {
            (false, c)
        };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let coeff = if mag == Complex64::new(1.0, 0.0) {
            String::new()
        } else if mag.im == 0.0 {
            format!("{} ", format_real(mag.re))
        } else if mag.re == 0.0 {
            format!("{}i ", format_real(mag.im))
        } else if mag.im < 0.0 {
            format!("({} - {}i) ", format_real(mag.re), format_real(-mag.im))
        } else {
            format!("({} + {}i) ", format_real(mag.re), format_real(mag.im))
        };
        out.push_str(&coeff);
        out.push_str(&body);
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

impl fmt::Display for AlgElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Leftmost,
    Rightmost,
}

/// Outcome of one pair rewrite.
enum Rewrite {
    Zero,
    One(Gen),
}

fn rewrite_pair(g: &Graph, a: Gen, b: Gen) -> Option<Rewrite> {
    use Gen::*;
    let keep_if = |cond: bool, x: Gen| Some(if cond { Rewrite::One(x) } else { Rewrite::Zero });
    match (a, b) {
        (P(v), P(w)) => keep_if(v == w, P(v)),
        (P(v), S(e)) => keep_if(g.rng(e) == v, S(e)),
        (S(e), P(v)) => keep_if(g.src(e) == v, S(e)),
        (P(v), SStar(e)) => keep_if(g.src(e) == v, SStar(e)),
        (SStar(e), P(v)) => keep_if(g.rng(e) == v, SStar(e)),
        (SStar(e), S(f)) => keep_if(e == f, P(g.src(e))),
        (S(e), S(f)) if g.src(e) != g.rng(f) => Some(Rewrite::Zero),
        (SStar(e), SStar(f)) if g.rng(e) != g.src(f) => Some(Rewrite::Zero),
        (S(e), SStar(f)) if g.src(e) != g.src(f) => Some(Rewrite::Zero),
        _ => None,
    }
}

/// Irreducible word read as a monomial.
fn word_to_monomial(g: &Graph, word: &[Gen]) -> Monomial {
    if let [Gen::P(v)] = word {
        return Monomial::vertex(*v);
    }
    let split = word.iter().position(|x| matches!(x, Gen::SStar(_))).unwrap_or(word.len());
    let mu_steps: Vec<EdgeId> = word[..split]
        .iter()
        .rev()
        .map(|x| match x {
            Gen::S(e) => *e,
            _ => unreachable!("irreducible words are S-letters then S*-letters"),
        })
        .collect();
    let nu_steps: Vec<EdgeId> = word[split..]
        .iter()
        .map(|x| match x {
            Gen::SStar(e) => *e,
            _ => unreachable!("irreducible words are S-letters then S*-letters"),
        })
        .collect();
    let nu = if nu_steps.is_empty() {
        None
    } else {
        Some(Path::from_steps(g, nu_steps).expect("irreducible chain"))
    };
    let mu = if mu_steps.is_empty() {
        None
    } else {
        Some(Path::from_steps(g, mu_steps).expect("irreducible chain"))
    };
    match (mu, nu) {
        (Some(mu), Some(nu)) => Monomial { mu, nu },
        (Some(mu), None) => Monomial {
            nu: Path::vertex(mu.source()),
            mu,
        },
        (None, Some(nu)) => Monomial {
            mu: Path::vertex(nu.source()),
            nu,
        },
        (None, None) => unreachable!("nonempty word"),
    }
}

/// Rewriting outcome: the monomial (or zero) and the number of rewrite steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Rewritten {
    pub monomial: Option<Monomial>,
    pub steps: usize,
}

/// Rewrites a nonempty generator word to a single monomial or zero. Every
/// step shortens the word, so at most `len − 1` steps occur.
pub fn rewrite_word(g: &Graph, word: &[Gen], strategy: Strategy) -> Result<Rewritten> {
    if word.is_empty() {
        return Err(Error::Empty("generator word".into()));
    }
    for &x in word {
        x.check(g)?;
    }
    let mut w = word.to_vec();
    let mut steps = 0;
    loop {
        let positions: Box<dyn Iterator<Item = usize>> = match strategy {
            Strategy::Leftmost => Box::new(0..w.len().saturating_sub(1)),
            Strategy::Rightmost => Box::new((0..w.len().saturating_sub(1)).rev()),
        };
        let mut fired = None;
        for i in positions {
            if let Some(r) = rewrite_pair(g, w[i], w[i + 1]) {
                fired = Some((i, r));
                break;
            }
        }
        match fired {
            None => {
                return Ok(Rewritten {
                    monomial: Some(word_to_monomial(g, &w)),
                    steps,
                })
            }
            Some((_, Rewrite::Zero)) => {
                return Ok(Rewritten {
                    monomial: None,
                    steps: steps + 1,
                })
            }
            Some((i, Rewrite::One(x))) => {
                w.splice(i..i + 2, [x]);
                steps += 1;
            }
        }
    }
}

/// Normal form of a generator word.
pub fn normal_form(graph: &Arc<Graph>, word: &[Gen]) -> Result<AlgElement> {
    let r = rewrite_word(graph, word, Strategy::Leftmost)?;
    Ok(match r.monomial {
        Some(m) => AlgElement::monomial(graph.clone(), m, Complex64::new(1.0, 0.0)),
        None => AlgElement::zero(graph.clone()),
    })
}

/// Normal form of a parsed linear combination of words.
pub fn normal_form_expression(graph: &Arc<Graph>, expr: &Expression) -> Result<AlgElement> {
    let mut out = AlgElement::zero(graph.clone());
    for (c, word) in &expr.terms {
        out = out.add(&normal_form(graph, word)?.scale(*c))?;
    }
    Ok(out)
}

pub fn multiply(a: &AlgElement, b: &AlgElement) -> Result<AlgElement> {
    if *a.graph != *b.graph {
        return Err(Error::GraphMismatch);
    }
    let mut out = AlgElement::zero(a.graph.clone());
    for (x, cx) in &a.terms {
        for (y, cy) in &b.terms {
            if let Some(m) = x.product(y) {
                *out.terms.entry(m).or_default() += cx * cy;
            }
        }
    }
    out.purge();
    Ok(out)
}

pub fn adjoint_element(a: &AlgElement) -> AlgElement {
    a.adjoint()
}

/// Product of the generator matrices, right to left, with no rewriting.
pub fn evaluate_word(word: &[Gen], fam: &OperatorFamily) -> Result<CMat> {
    if word.is_empty() {
        return Err(Error::Empty("generator word".into()));
    }
    for &x in word {
        x.check(fam.graph())?;
    }
    let mat = |x: Gen| match x {
        Gen::P(v) => fam.p(v).clone(),
        Gen::S(e) => fam.s(e).clone(),
        Gen::SStar(e) => adjoint(fam.s(e)),
    };
    let mut out = mat(word[0]);
    for &x in &word[1..] {
        out *= mat(x);
    }
    Ok(out)
}

/// Action of a raw word on `ξ_λ` in the untruncated Fock space.
pub fn fock_action_word(g: &Graph, word: &[Gen], lambda: &Path) -> Option<Path> {
    let mut cur = lambda.clone();
    for &x in word.iter().rev() {
        cur = match x {
            Gen::P(v) => (cur.range() == v).then_some(cur)?,
            Gen::S(e) => cur.prepend(g, e)?,
            Gen::SStar(e) => cur.strip_range_prefix(&Path::edge(g, e))?,
        };
    }
    Some(cur)
}

/// Largest partial sum of `+1` per `s_e` and `−1` per `s_e*`, reading right to
/// left: how far above its starting length the word pushes a basis vector.
pub fn climb(word: &[Gen]) -> usize {
    let mut h: i64 = 0;
    let mut best: i64 = 0;
    for x in word.iter().rev() {
        match x {
            Gen::S(_) => h += 1,
            Gen::SStar(_) => h -= 1,
            Gen::P(_) => {}
        }
        best = best.max(h);
    }
    best as usize
}
