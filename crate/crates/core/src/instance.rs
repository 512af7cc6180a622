//! Line-oriented text format for energy models.
//!
//! ```text
//! binary-mrf 1
//! n <vertex_count> m <edge_count>
//! c <theta_const>
//! v <s> <theta_s0> <theta_s1>                          (one per vertex)
//! e <s> <t> <theta_00> <theta_01> <theta_10> <theta_11> (one per edge, s < t)
//! ```
//!
//! Blank lines and everything after `#` are ignored. Reals are written with
//! the shortest representation that parses back to the same value.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::energy::{EnergyModel, Graph, Parameters};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAGIC: &str = "binary-mrf";
pub const FORMAT_VERSION: u32 = 1;

pub fn read_instance<T: Real>(path: impl AsRef<Path>) -> Result<EnergyModel<T>> {
    parse_instance(&fs::read_to_string(path)?)
}

pub fn write_instance<T: Real>(model: &EnergyModel<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_instance(model))?;
    Ok(())
}

pub fn format_instance<T: Real>(model: &EnergyModel<T>) -> String {
    let g = &model.graph;
    let p = &model.params;
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {FORMAT_VERSION}");
    let _ = writeln!(out, "n {} m {}", g.vertex_count(), g.edge_count());
    let _ = writeln!(out, "c {}", p.const_term);
    for (s, th) in p.node.iter().enumerate() {
        let _ = writeln!(out, "v {s} {} {}", th[0], th[1]);
    }
    for (e, &(s, t)) in g.edges().iter().enumerate() {
        let tab = &p.edge[e];
        let _ = writeln!(
            out,
            "e {s} {t} {} {} {} {}",
            tab[0][0], tab[0][1], tab[1][0], tab[1][1]
        );
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-empty line with its 1-based number, comments stripped.
    fn next_record(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, raw) in self.inner.by_ref() {
            let body = raw.split('#').next().unwrap_or("");
            let fields: Vec<&str> = body.split_whitespace().collect();
            if !fields.is_empty() {
                return Some((i + 1, fields));
            }
        }
        None
    }
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: Real>(line: usize, field: &str) -> Result<T> {
    let v: T = field
        .parse()
        .map_err(|_| perr(line, format!("`{field}` is not a real number")))?;
    if !v.is_finite() {
        return Err(perr(line, format!("`{field}` is not finite")));
    }
    Ok(v)
}

fn parse_index(line: usize, field: &str) -> Result<usize> {
    field
        .parse()
        .map_err(|_| perr(line, format!("`{field}` is not a vertex index")))
}

fn expect_fields(line: usize, fields: &[&str], tag: &str, count: usize) -> Result<()> {
    if fields[0] != tag {
        return Err(perr(
            line,
            format!("expected `{tag}` record, found `{}`", fields[0]),
        ));
    }
    if fields.len() != count {
        return Err(perr(
            line,
            format!(
                "`{tag}` record needs {} fields, found {}",
                count,
                fields.len()
            ),
        ));
    }
    Ok(())
}

pub fn parse_instance<T: Real>(text: &str) -> Result<EnergyModel<T>> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let eof = |what: &str| {
        perr(
            text.lines().count() + 1,
            format!("unexpected end of file, expected {what}"),
        )
    };

    let (ln, f) = lines.next_record().ok_or_else(|| eof("header"))?;
    if f.len() != 2 || f[0] != MAGIC {
        return Err(perr(
            ln,
            format!("expected `{MAGIC} {FORMAT_VERSION}` header"),
        ));
    }
    if f[1] != FORMAT_VERSION.to_string() {
        return Err(perr(ln, format!("unsupported format version `{}`", f[1])));
    }

    let (ln, f) = lines.next_record().ok_or_else(|| eof("size line"))?;
    if f.len() != 4 || f[0] != "n" || f[2] != "m" {
        return Err(perr(ln, "expected `n <vertex_count> m <edge_count>`"));
    }
    let n = parse_index(ln, f[1])?;
    let m = parse_index(ln, f[3])?;
    if n == 0 {
        return Err(perr(ln, "vertex count must be positive"));
    }

    let (ln, f) = lines.next_record().ok_or_else(|| eof("constant line"))?;
    expect_fields(ln, &f, "c", 2)?;
    let const_term = parse_num::<T>(ln, f[1])?;

    let mut params = Parameters::<T>::zeros_sized(n, 0);
    params.const_term = const_term;
    let mut seen = vec![false; n];
    for _ in 0..n {
        let (ln, f) = lines.next_record().ok_or_else(|| eof("vertex line"))?;
        if f[0] == "e" {
            return Err(perr(
                ln,
                format!("inconsistent vertex count: header declares {n}"),
            ));
        }
        expect_fields(ln, &f, "v", 4)?;
        let s = parse_index(ln, f[1])?;
        if s >= n {
            return Err(perr(ln, format!("vertex {s} out of range (n = {n})")));
        }
        if std::mem::replace(&mut seen[s], true) {
            return Err(perr(ln, format!("duplicate vertex {s}")));
        }
        params.node[s] = [parse_num(ln, f[2])?, parse_num(ln, f[3])?];
    }

    let mut edges = Vec::with_capacity(m);
    let mut seen_edges = std::collections::HashSet::new();
    for _ in 0..m {
        let (ln, f) = lines.next_record().ok_or_else(|| eof("edge line"))?;
        if f[0] == "v" {
            return Err(perr(
                ln,
                format!("inconsistent vertex count: header declares {n}"),
            ));
        }
        expect_fields(ln, &f, "e", 7)?;
        let s = parse_index(ln, f[1])?;
        let t = parse_index(ln, f[2])?;
        if s >= n || t >= n {
            return Err(perr(ln, format!("edge ({s}, {t}) has an endpoint >= {n}")));
        }
        if s >= t {
            return Err(perr(ln, format!("edge ({s}, {t}) must satisfy s < t")));
        }
        if !seen_edges.insert((s, t)) {
            return Err(perr(ln, format!("duplicate edge ({s}, {t})")));
        }
        edges.push((s, t));
        params.edge.push([
            [parse_num(ln, f[3])?, parse_num(ln, f[4])?],
            [parse_num(ln, f[5])?, parse_num(ln, f[6])?],
        ]);
    }
    if let Some((ln, f)) = lines.next_record() {
        return Err(perr(
            ln,
            format!("trailing `{}` record after {m} declared edges", f[0]),
        ));
    }
    let graph = Graph::new(n, edges).map_err(|e| perr(0, e.to_string()))?;
    EnergyModel::new(graph, params)
}
