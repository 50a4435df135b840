//! Alternating words over a colored graph: each letter is a single-color
//! monomial, neighbouring letters have different colors, and vertex
//! projections are absorbed into their neighbours.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::{render_terms, rewrite_word, Gen, Monomial, Strategy, PURGE};
use crate::error::{Error, Result};
use crate::family::OperatorFamily;
use crate::graph::{ColorId, Graph};
use crate::linalg::{zeros, CMat};

/// `None` colors a vertex projection; it only survives as a whole word.
pub type FreeWord = Vec<(Option<ColorId>, Monomial)>;

fn color_of(g: &Graph, m: &Monomial) -> Result<Option<ColorId>> {
    let mut colors = m.mu().steps().iter().chain(m.nu().steps()).map(|&e| g.color(e));
    let Some(first) = colors.next() else {
        return Ok(None);
    };
    if colors.any(|c| c != first) {
        return Err(Error::Invalid("letter mixes colors".into()));
    }
    Ok(Some(first))
}

/// Merges same-color neighbours and splices vertex projections until the word
/// alternates. `None` means the word is zero.
pub fn reduce_word(g: &Graph, word: FreeWord) -> Result<Option<FreeWord>> {
    let mut w = word;
    loop {
        let mut changed = false;
        let mut i = 0;
        while i + 1 < w.len() {
            let (ca, cb) = (w[i].0, w[i + 1].0);
            if ca.is_none() || cb.is_none() || ca == cb {
                let Some(m) = w[i].1.product(&w[i + 1].1) else {
                    return Ok(None);
                };
                let c = color_of(g, &m)?;
                w.splice(i..i + 2, [(c, m)]);
                changed = true;
            } else {
                i += 1;
            }
        }
        if !changed {
            return Ok(Some(w));
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreeElement {
    graph: Arc<Graph>,
    terms: BTreeMap<FreeWord, Complex64>,
}

impl FreeElement {
    pub fn zero(graph: Arc<Graph>) -> Self {
        FreeElement {
            graph,
            terms: BTreeMap::new(),
        }
    }

    /// Each generator becomes one letter; the word is then reduced.
    pub fn from_word(graph: Arc<Graph>, word: &[Gen]) -> Result<Self> {
        let mut letters = Vec::with_capacity(word.len());
        for &x in word {
            let r = rewrite_word(&graph, &[x], Strategy::Leftmost)?;
            let m = r.monomial.expect("single generators are nonzero");
            letters.push((color_of(&graph, &m)?, m));
        }
        let mut out = Self::zero(graph.clone());
        if let Some(w) = reduce_word(&graph, letters)? {
            out.terms.insert(w, Complex64::new(1.0, 0.0));
        }
        Ok(out)
    }

    pub fn from_expression(graph: Arc<Graph>, expr: &super::Expression) -> Result<Self> {
        let mut out = Self::zero(graph.clone());
        for (c, w) in &expr.terms {
            out = out.add(&Self::from_word(graph.clone(), w)?.scale(*c))?;
        }
        Ok(out)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn terms(&self) -> &BTreeMap<FreeWord, Complex64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn purge(&mut self) {
        let largest = self.terms.values().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = PURGE * largest;
        self.terms.retain(|_, c| c.norm() > cut && c.norm() > 0.0);
    }

    pub fn add(&self, other: &FreeElement) -> Result<FreeElement> {
        if *self.graph != *other.graph {
            return Err(Error::GraphMismatch);
        }
        let mut out = self.clone();
        for (w, c) in &other.terms {
            *out.terms.entry(w.clone()).or_default() += c;
        }
        out.purge();
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> FreeElement {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out.purge();
        out
    }

    pub fn multiply(&self, other: &FreeElement) -> Result<FreeElement> {
        if *self.graph != *other.graph {
            return Err(Error::GraphMismatch);
        }
        let mut out = Self::zero(self.graph.clone());
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let mut w = a.clone();
                w.extend(b.iter().cloned());
                if let Some(w) = reduce_word(&self.graph, w)? {
                    *out.terms.entry(w).or_default() += ca * cb;
                }
            }
        }
        out.purge();
        Ok(out)
    }

    pub fn adjoint(&self) -> FreeElement {
        FreeElement {
            graph: self.graph.clone(),
            terms: self
                .terms
                .iter()
                .map(|(w, c)| {
                    let rev = w.iter().rev().map(|(col, m)| (*col, m.adjoint())).collect();
                    (rev, c.conj())
                })
                .collect(),
        }
    }

    pub fn evaluate(&self, fam: &OperatorFamily) -> Result<CMat> {
        if *fam.graph() != *self.graph {
            return Err(Error::GraphMismatch);
        }
        let d = fam.dim();
        let mut out = zeros(d, d);
        for (w, c) in &self.terms {
            let mut it = w.iter();
            let mut m = it.next().expect("nonempty word").1.evaluate(fam);
            for (_, x) in it {
                m *= x.evaluate(fam);
            }
            out += m * *c;
        }
        Ok(out)
    }

    pub fn render(&self) -> String {
        render_terms(self.terms.iter().map(|(w, c)| {
            let body = w
                .iter()
                .map(|(_, m)| m.render(&self.graph))
                .collect::<Vec<_>>()
                .join(" ");
            (body, *c)
        }))
    }
}
