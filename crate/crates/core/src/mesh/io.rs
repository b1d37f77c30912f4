use std::io::{BufRead, Write};

use super::{Mesh2D, Region};
use crate::error::{Error, Result};

/// Writes `vertices n triangles m`, then `x y` lines, then `i j k tag` lines
/// with tag 0 for INTERIOR and 1 for LAYER.
pub fn write_ascii<W: Write>(mesh: &Mesh2D, mut out: W) -> Result<()> {
    writeln!(out, "vertices {} triangles {}", mesh.n_vertices(), mesh.n_triangles())?;
    for p in mesh.vertices() {
        writeln!(out, "{:e} {:e}", p[0], p[1])?;
    }
    for (t, tag) in mesh.triangles().iter().zip(mesh.tags()) {
        let code = match tag {
            Region::Interior => 0,
            Region::Layer => 1,
        };
        writeln!(out, "{} {} {} {}", t[0], t[1], t[2], code)?;
    }
    Ok(())
}

/// Reads the format of [`write_ascii`]. Blank lines and `#` comments are
/// skipped; the nominal mesh size is set to the longest edge.
pub fn read_ascii<R: BufRead>(input: R) -> Result<Mesh2D> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty() && !s.trim().starts_with('#')));
    let mut next = || -> Result<(usize, String)> {
        match lines.next() {
            Some((n, l)) => Ok((n, l?)),
            None => Err(Error::Parse { line: 0, msg: "unexpected end of input".into() }),
        }
    };
    let bad = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };

    let (n, header) = next()?;
    let words: Vec<&str> = header.split_whitespace().collect();
    if words.len() != 4 || words[0] != "vertices" || words[2] != "triangles" {
        return Err(bad(n, "expected `vertices <n> triangles <m>`"));
    }
    let nv: usize = words[1].parse().map_err(|_| bad(n, "bad vertex count"))?;
    let nt: usize = words[3].parse().map_err(|_| bad(n, "bad triangle count"))?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, l) = next()?;
        let v: Vec<f64> = l
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(n, "bad coordinate"))?;
        if v.len() != 2 {
            return Err(bad(n, "expected `x y`"));
        }
        vertices.push([v[0], v[1]]);
    }
    let mut triangles = Vec::with_capacity(nt);
    let mut tags = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (n, l) = next()?;
        let v: Vec<usize> = l
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(n, "bad triangle record"))?;
        if v.len() != 4 || v[3] > 1 {
            return Err(bad(n, "expected `i j k tag` with tag 0 or 1"));
        }
        triangles.push([v[0], v[1], v[2]]);
        tags.push(if v[3] == 0 { Region::Interior } else { Region::Layer });
    }
    let mut mesh = Mesh2D::new(vertices, triangles, tags, 1.0)?;
    mesh.h = mesh.max_edge_length();
    Ok(mesh)
}
