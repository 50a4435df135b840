//! Expression syntax: `p(v)`, `s(e)`, `s*(e)`, juxtaposition for products,
//! `+`/`-`, real and imaginary literals (`2`, `0.5i`, `i`), parentheses.

use num_complex::Complex64;

use super::Gen;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// A parsed linear combination of generator words.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    pub terms: Vec<(Complex64, Vec<Gen>)>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Complex64),
    Gen(Gen),
    Plus,
    Minus,
    LParen,
    RParen,
}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn err(text: &str, offset: usize, message: impl Into<String>) -> Error {
    let (line, column) = position(text, offset);
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn lex(g: &Graph, text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            b'-' => {
                out.push((i, Tok::Minus));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let x: f64 = lit
                    .parse()
                    .map_err(|_| err(text, start, format!("malformed number `{lit}`")))?;
                if i < bytes.len() && bytes[i] == b'i' {
                    i += 1;
                    out.push((start, Tok::Num(Complex64::new(0.0, x))));
                } else {
                    out.push((start, Tok::Num(Complex64::new(x, 0.0))));
                }
            }
            b'i' => {
                out.push((i, Tok::Num(Complex64::new(0.0, 1.0))));
                i += 1;
            }
            b'p' | b's' => {
                let start = i;
                i += 1;
                let star = c == b's' && i < bytes.len() && bytes[i] == b'*';
                if star {
                    i += 1;
                }
                if i >= bytes.len() || bytes[i] != b'(' {
                    return Err(err(text, i, "expected `(` after generator name"));
                }
                i += 1;
                let id_start = i;
                while i < bytes.len() && bytes[i] != b')' {
                    i += 1;
                }
                if i >= bytes.len() {
                    return Err(err(text, start, "unclosed generator"));
                }
                let id = &text[id_start..i];
                if id.is_empty() || id.chars().any(|ch| ch.is_whitespace() || ch == '(') {
                    return Err(err(text, id_start, format!("malformed id `{id}`")));
                }
                i += 1;
                let gen = match (c, star) {
                    (b'p', _) => Gen::P(
                        g.vertex_id(id)
                            .map_err(|_| err(text, id_start, format!("unknown vertex `{id}`")))?,
                    ),
                    (_, false) => Gen::S(
                        g.edge_id(id)
                            .map_err(|_| err(text, id_start, format!("unknown edge `{id}`")))?,
                    ),
                    (_, true) => Gen::SStar(
                        g.edge_id(id)
                            .map_err(|_| err(text, id_start, format!("unknown edge `{id}`")))?,
                    ),
                };
                out.push((start, Tok::Gen(gen)));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap();
                return Err(err(text, i, format!("unexpected character `{ch}`")));
            }
        }
    }
    Ok(out)
}

type Poly = Vec<(Complex64, Vec<Gen>)>;

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (ca, wa) in a {
        for (cb, wb) in b {
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            out.push((ca * cb, w));
        }
    }
    out
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.at).map_or(self.text.len(), |(o, _)| *o)
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut out = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    out.extend(self.term()?);
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    out.extend(self.term()?.into_iter().map(|(c, w)| (-c, w)));
                }
                _ => return Ok(out),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut sign = Complex64::new(1.0, 0.0);
        while let Some(Tok::Minus) = self.peek() {
            sign = -sign;
            self.at += 1;
        }
        let mut acc: Poly = vec![(sign, Vec::new())];
        let mut factors = 0;
        while let Some(t) = self.peek() {
            let f: Poly = match t.clone() {
                Tok::Num(c) => {
                    self.at += 1;
                    vec![(c, Vec::new())]
                }
                Tok::Gen(x) => {
                    self.at += 1;
                    vec![(Complex64::new(1.0, 0.0), vec![x])]
                }
                Tok::LParen => {
                    let open = self.offset();
                    self.at += 1;
                    let inner = self.expr()?;
                    if self.peek() != Some(&Tok::RParen) {
                        return Err(err(self.text, open, "unbalanced `(`"));
                    }
                    self.at += 1;
                    inner
                }
                _ => break,
            };
            acc = mul(&acc, &f);
            factors += 1;
        }
        if factors == 0 {
            let msg = match self.peek() {
                Some(Tok::RParen) => "unexpected `)`",
                None => "expected a term",
                _ => "expected a factor",
            };
            return Err(err(self.text, self.offset(), msg));
        }
        Ok(acc)
    }
}

/// Parses an expression against the ids of `g`. Terms without any generator
/// are rejected: the algebra has no unit.
pub fn parse_expression(g: &Graph, text: &str) -> Result<Expression> {
    let toks = lex(g, text)?;
    if toks.is_empty() {
        return Err(err(text, 0, "empty expression"));
    }
    let mut p = Parser { text, toks, at: 0 };
    let poly = p.expr()?;
    if p.at < p.toks.len() {
        return Err(err(text, p.offset(), "unexpected `)`"));
    }
    if poly.iter().any(|(c, w)| w.is_empty() && c.norm() > 0.0) {
        return Err(err(text, 0, "scalar term without generators (the algebra has no unit)"));
    }
    Ok(Expression {
        terms: poly.into_iter().filter(|(_, w)| !w.is_empty()).collect(),
    })
}

/// A single product of generators with coefficient one.
pub fn parse_word(g: &Graph, text: &str) -> Result<Vec<Gen>> {
    let e = parse_expression(g, text)?;
    match e.terms.as_slice() {
        [(c, w)] if *c == Complex64::new(1.0, 0.0) => Ok(w.clone()),
        _ => Err(err(text, 0, "expected a single generator word")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> Graph {
        Graph::new(&["u", "v"], &[("e", "u", "v"), ("f", "v", "u")]).unwrap()
    }

    #[test]
    fn words_and_coefficients() {
        let g = g();
        let e = g.edge_id("e").unwrap();
        assert_eq!(parse_word(&g, "s*(e) s(e)").unwrap(), vec![Gen::SStar(e), Gen::S(e)]);
        let x = parse_expression(&g, "(2+3i) s(e) - i p(u)").unwrap();
        assert_eq!(x.terms.len(), 3);
        assert_eq!(x.terms[0].0, Complex64::new(2.0, 0.0));
        assert_eq!(x.terms[1].0, Complex64::new(0.0, 3.0));
        assert_eq!(x.terms[2].0, Complex64::new(0.0, -1.0));
        let y = parse_expression(&g, "-1.5e-1 s(f)").unwrap();
        assert_eq!(y.terms[0].0, Complex64::new(-0.15, 0.0));
    }

    #[test]
    fn errors_carry_positions() {
        let g = g();
        match parse_expression(&g, "s(e) s(zz)") {
            Err(Error::Parse { line, column, message }) => {
                assert_eq!((line, column), (1, 8));
                assert!(message.contains("zz"));
            }
            other => panic!("{other:?}"),
        }
        match parse_expression(&g, "s(e)\n  p(w)") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 5)),
            other => panic!("{other:?}"),
        }
        assert!(parse_expression(&g, "s(e e)").is_err());
        assert!(parse_expression(&g, "(s(e)").is_err());
        assert!(parse_expression(&g, "s(e))").is_err());
        assert!(parse_expression(&g, "2 + s(e)").is_err());
        assert!(parse_expression(&g, "").is_err());
        assert!(parse_expression(&g, "q(u)").is_err());
    }
}
