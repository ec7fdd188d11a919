//! Plain-text model files.
//!
//! ```text
//! union d=<d> K=<K>
//! subspace r=<r>
//! <basis vector 1: d numbers>
//! ...
//! <basis vector r>
//! ... (K subspace blocks)
//! pi <K weights>          (priors only)
//!
//! box d=<d>
//! <d lower bounds>
//! <d upper bounds>
//!
//! matrix m=<m> d=<d>
//! <m rows of d numbers>
//! ```
//!
//! Numbers are written with 17 significant digits, so files round-trip
//! exactly for `f64`. Blank lines and lines starting with `#` are ignored.

use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::lrgmm::LrGmmPrior;
use crate::model_sets::{BoxSet, Subspace, UnionOfSubspaces};
use crate::scalar::Real;
use crate::trace::fmt17;

/// Any model file.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelFile<T> {
    Union(UnionOfSubspaces<T>),
    Prior(LrGmmPrior<T>),
    Box(BoxSet<T>),
    Matrix(Matrix<T>),
}

fn push_row<T: Real>(out: &mut String, v: impl IntoIterator<Item = T>) {
    let row: Vec<String> = v.into_iter().map(fmt17).collect();
    out.push_str(&row.join(" "));
    out.push('\n');
}

pub fn union_to_string<T: Real>(s: &UnionOfSubspaces<T>) -> String {
    let mut out = format!("union d={} K={}\n", s.ambient_dim(), s.len());
    for e in s.components() {
        out.push_str(&format!("subspace r={}\n", e.rank()));
        let basis = e.basis();
        for j in 0..basis.cols() {
            push_row(&mut out, basis.column(j));
        }
    }
    out
}

pub fn prior_to_string<T: Real>(p: &LrGmmPrior<T>) -> String {
    let mut out = union_to_string(p.union());
    out.push_str("pi ");
    push_row(&mut out, p.pi());
    out
}

pub fn box_to_string<T: Real>(b: &BoxSet<T>) -> String {
    let mut out = format!("box d={}\n", b.ambient_dim());
    push_row(&mut out, b.lower().iter().copied());
    push_row(&mut out, b.upper().iter().copied());
    out
}

pub fn matrix_to_string<T: Real>(a: &Matrix<T>) -> String {
    let mut out = format!("matrix m={} d={}\n", a.rows(), a.cols());
    for i in 0..a.rows() {
        push_row(&mut out, a.row(i).iter().copied());
    }
    out
}

impl<T: Real> ModelFile<T> {
    pub fn to_text(&self) -> String {
        match self {
            ModelFile::Union(u) => union_to_string(u),
            ModelFile::Prior(p) => prior_to_string(p),
            ModelFile::Box(b) => box_to_string(b),
            ModelFile::Matrix(a) => matrix_to_string(a),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModelFile::Union(_) => "union",
            ModelFile::Prior(_) => "prior",
            ModelFile::Box(_) => "box",
            ModelFile::Matrix(_) => "matrix",
        }
    }
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Self { inner: it.peekable(), last: 0 }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l))
            }
            None => Err(Error::Parse { line: self.last + 1, msg: format!("unexpected end of file, expected {what}") }),
        }
    }

    fn peek(&mut self) -> Option<(usize, &'a str)> {
        self.inner.peek().copied()
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses `keyword k1=v1 k2=v2` and returns the values in the order given.
fn header(line: usize, text: &str, keyword: &str, keys: &[&str]) -> Result<Vec<usize>> {
    let mut parts = text.split_whitespace();
    if parts.next() != Some(keyword) {
        return Err(parse_err(line, format!("expected '{keyword}' header")));
    }
    let fields: Vec<&str> = parts.collect();
    if fields.len() != keys.len() {
        return Err(parse_err(line, format!("'{keyword}' header needs {}", keys.join(", "))));
    }
    keys.iter()
        .zip(fields)
        .map(|(key, f)| {
            let v = f
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .ok_or_else(|| parse_err(line, format!("expected {key}=<value>, found '{f}'")))?;
            v.parse::<usize>()
                .map_err(|e| parse_err(line, format!("{key}: {e}")))
        })
        .collect()
}

fn numbers<T: Real>(line: usize, text: &str, expected: usize) -> Result<Vec<T>> {
    let v = text
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map(T::lit)
                .map_err(|e| parse_err(line, format!("'{tok}': {e}")))
        })
        .collect::<Result<Vec<T>>>()?;
    if v.len() != expected {
        return Err(parse_err(line, format!("expected {expected} numbers, found {}", v.len())));
    }
    Ok(v)
}

fn parse_union<T: Real>(lines: &mut Lines<'_>) -> Result<UnionOfSubspaces<T>> {
    let (ln, h) = lines.next("union header")?;
    let dk = header(ln, h, "union", &["d", "K"])?;
    let (d, k) = (dk[0], dk[1]);
    let mut comps = Vec::with_capacity(k);
    for _ in 0..k {
        let (ln, h) = lines.next("subspace header")?;
        let r = header(ln, h, "subspace", &["r"])?[0];
        let mut cols = Vec::with_capacity(r);
        let mut ln = ln;
        for _ in 0..r {
            let (l, row) = lines.next("basis row")?;
            cols.push(numbers::<T>(l, row, d)?);
            ln = l;
        }
        let basis = Matrix::from_columns(&cols).map_err(|e| parse_err(ln, e.to_string()))?;
        comps.push(Subspace::new(basis).map_err(|e| parse_err(ln, e.to_string()))?);
    }
    UnionOfSubspaces::new(comps).map_err(|e| parse_err(ln, e.to_string()))
}

/// Parses any model file, dispatching on the first header keyword.
pub fn parse_model<T: Real>(text: &str) -> Result<ModelFile<T>> {
    let mut lines = Lines::new(text);
    let (ln, first) = lines.peek().ok_or_else(|| parse_err(1, "empty model file"))?;
    let model = match first.split_whitespace().next().unwrap_or("") {
        "union" => {
            let u = parse_union(&mut lines)?;
            match lines.peek() {
                Some((ln, l)) if l.starts_with("pi") => {
                    lines.next("pi row")?;
                    let rest = l["pi".len()..].trim();
                    let pi = numbers::<T>(ln, rest, u.len())?;
                    ModelFile::Prior(LrGmmPrior::new(u, &pi).map_err(|e| parse_err(ln, e.to_string()))?)
                }
                _ => ModelFile::Union(u),
            }
        }
        "box" => {
            lines.next("box header")?;
            let d = header(ln, first, "box", &["d"])?[0];
            let (l1, lo) = lines.next("lower bounds")?;
            let lower = numbers::<T>(l1, lo, d)?;
            let (l2, hi) = lines.next("upper bounds")?;
            let upper = numbers::<T>(l2, hi, d)?;
            ModelFile::Box(BoxSet::new(lower, upper).map_err(|e| parse_err(l2, e.to_string()))?)
        }
        "matrix" => {
            lines.next("matrix header")?;
            let md = header(ln, first, "matrix", &["m", "d"])?;
            let (m, d) = (md[0], md[1]);
            let mut data = Vec::with_capacity(m * d);
            for _ in 0..m {
                let (l, row) = lines.next("matrix row")?;
                data.extend(numbers::<T>(l, row, d)?);
            }
            ModelFile::Matrix(Matrix::from_row_major(m, d, data)?)
        }
        other => return Err(parse_err(ln, format!("unknown model kind '{other}'"))),
    };
    if let Some((ln, l)) = lines.peek() {
        return Err(parse_err(ln, format!("trailing content '{l}'")));
    }
    Ok(model)
}

pub fn read_model<T: Real>(path: impl AsRef<Path>) -> Result<ModelFile<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text)
}

pub fn write_model<T: Real>(path: impl AsRef<Path>, model: &ModelFile<T>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model.to_text())
        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn union_and_prior_round_trip_exactly() {
        let mut rng = SeededRng::new(3);
        let u = UnionOfSubspaces::<f64>::random(6, 2, 3, &mut rng).unwrap();
        let back = parse_model::<f64>(&union_to_string(&u)).unwrap();
        assert_eq!(back, ModelFile::Union(u.clone()));

        let p = LrGmmPrior::new(u, &[0.2, 0.3, 0.5]).unwrap();
        match parse_model::<f64>(&prior_to_string(&p)).unwrap() {
            ModelFile::Prior(q) => {
                assert_eq!(q.union(), p.union());
                for (a, b) in q.pi().iter().zip(p.pi()) {
                    assert!((a - b).abs() <= 1e-16);
                }
            }
            other => panic!("parsed as {}", other.kind()),
        }
    }

    #[test]
    fn box_and_matrix_round_trip() {
        let b = BoxSet::new(vec![-1.0, 0.0, -0.25], vec![2.0, 0.0, 1.0 / 3.0]).unwrap();
        assert_eq!(parse_model::<f64>(&box_to_string(&b)).unwrap(), ModelFile::Box(b));
        let a = Matrix::from_rows(&[vec![0.1, 0.2, 0.3], vec![1e-300, -7.0, f64::MIN_POSITIVE]]).unwrap();
        assert_eq!(parse_model::<f64>(&matrix_to_string(&a)).unwrap(), ModelFile::Matrix(a));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "union d=2 K=1\nsubspace r=1\n1.0 oops\n";
        assert!(matches!(parse_model::<f64>(bad), Err(Error::Parse { line: 3, .. })));
        let short = "box d=2\n-1 -1\n";
        assert!(matches!(parse_model::<f64>(short), Err(Error::Parse { line: 3, .. })));
        let not_orth = "union d=2 K=1\nsubspace r=2\n1 0\n1 0\n";
        assert!(matches!(parse_model::<f64>(not_orth), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse_model::<f64>("# c\nwhat d=1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_model::<f64>("matrix m=1 d=1\n1\n2\n").is_err());
    }
}
