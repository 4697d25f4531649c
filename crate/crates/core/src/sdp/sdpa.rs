//! SDPA sparse (`.dat-s`) reading and writing.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use super::model::{Entry, RealSDP};
use crate::error::{Error, Result};

/// Renders the problem in canonical SDPA sparse form.
pub fn write_sdpa(p: &RealSDP, comment: Option<&str>) -> String {
    let mut s = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(s, "\"{line}");
        }
    }
    let _ = writeln!(s, "{}", p.m());
    let _ = writeln!(s, "{}", p.block_struct.len());
    let bs: Vec<String> = p.block_struct.iter().map(|d| d.to_string()).collect();
    let _ = writeln!(s, "{}", bs.join(" "));
    let b: Vec<String> = p.b.iter().map(|v| num(*v)).collect();
    let _ = writeln!(s, "{}", b.join(" "));
    for (k, es) in std::iter::once(&p.c).chain(p.a.iter()).enumerate() {
        let mut es = es.clone();
        es.sort_by_key(|e| (e.blk, e.i, e.j));
        for e in es {
            let _ = writeln!(s, "{} {} {} {} {}", k, e.blk + 1, e.i + 1, e.j + 1, num(e.v));
        }
    }
    s
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the problem to a sink.
pub fn export_sdpa(p: &RealSDP, sink: &mut impl Write) -> Result<()> {
    sink.write_all(write_sdpa(p, None).as_bytes())?;
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || "{}(),".contains(c)).filter(|t| !t.is_empty())
}

/// Parses SDPA sparse text.
pub fn read_sdpa(text: &str) -> Result<RealSDP> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| {
        let t = l.trim_start();
        !(t.is_empty() || t.starts_with('"') || t.starts_with('*'))
    });
    let mut next = |what: &str| lines.next().ok_or_else(|| parse_err(0, format!("unexpected end of file, expected {what}")));

    let (ln, l) = next("constraint count")?;
    let m: usize = tokens(l).next().and_then(|t| t.parse().ok()).ok_or_else(|| parse_err(ln, "bad constraint count"))?;
    let (ln, l) = next("block count")?;
    let nb: usize = tokens(l).next().and_then(|t| t.parse().ok()).ok_or_else(|| parse_err(ln, "bad block count"))?;
    let (ln, l) = next("block structure")?;
    let block_struct: Vec<i64> = tokens(l)
        .take(nb)
        .map(|t| t.parse::<i64>().map_err(|_| parse_err(ln, format!("bad block size '{t}'"))))
        .collect::<Result<_>>()?;
    if block_struct.len() != nb {
        return Err(parse_err(ln, format!("expected {nb} block sizes")));
    }
    if block_struct.contains(&0) {
        return Err(parse_err(ln, "block size 0"));
    }
    let mut b = Vec::with_capacity(m);
    let mut ln_b = ln;
    while b.len() < m {
        let (ln, l) = next("right-hand side")?;
        ln_b = ln;
        for t in tokens(l) {
            b.push(t.parse::<f64>().map_err(|_| parse_err(ln, format!("bad number '{t}'")))?);
        }
    }
    if b.len() != m {
        return Err(parse_err(ln_b, format!("expected {m} right-hand side values, found {}", b.len())));
    }
    let mut c = Vec::new();
    let mut a = vec![Vec::new(); m];
    for (ln, l) in lines {
        let t: Vec<&str> = tokens(l).collect();
        if t.len() != 5 {
            return Err(parse_err(ln, "expected 'k blk i j value'"));
        }
        let idx = |s: &str| s.parse::<usize>().map_err(|_| parse_err(ln, format!("bad index '{s}'")));
        let (k, blk, i, j) = (idx(t[0])?, idx(t[1])?, idx(t[2])?, idx(t[3])?);
        let v: f64 = t[4].parse().map_err(|_| parse_err(ln, format!("bad value '{}'", t[4])))?;
        if k > m {
            return Err(parse_err(ln, format!("matrix index {k} exceeds {m}")));
        }
        if blk == 0 || blk > nb {
            return Err(parse_err(ln, format!("block index {blk} out of range")));
        }
        let dim = block_struct[blk - 1].unsigned_abs() as usize;
        if i == 0 || j == 0 || i > dim || j > dim {
            return Err(parse_err(ln, format!("entry ({i},{j}) outside block {blk} of size {dim}")));
        }
        let e = Entry::new(blk - 1, i - 1, j - 1, v);
        if k == 0 {
            c.push(e);
        } else {
            a[k - 1].push(e);
        }
    }
    RealSDP::new(block_struct, c, a, b)
}

/// Reads a problem from a source.
pub fn import_sdpa(source: &mut impl BufRead) -> Result<RealSDP> {
    let mut s = String::new();
    source.read_to_string(&mut s)?;
    read_sdpa(&s)
}

/// Convenience wrapper for files.
pub fn import_sdpa_file(path: &Path) -> Result<RealSDP> {
    read_sdpa(&std::fs::read_to_string(path)?)
}
