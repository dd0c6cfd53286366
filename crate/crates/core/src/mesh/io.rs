//! Plain-text mesh exchange format.
//!
//! ```text
//! dim ncells nverts
//! x y [z]            (nverts lines)
//! v0 v1 v2 [v3]      (ncells lines)
//! ```

use super::{Point, SimplicialMesh};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::io::{Read, Write};

impl SimplicialMesh {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let d = self.dim();
        writeln!(s, "{} {} {}", d, self.num_cells(), self.num_vertices()).unwrap();
        for v in self.vertices() {
            let coords: Vec<String> = (0..d).map(|k| format!("{}", v[k])).collect();
            writeln!(s, "{}", coords.join(" ")).unwrap();
        }
        for cell in self.cells() {
            let ids: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
            writeln!(s, "{}", ids.join(" ")).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty mesh file".into()))?;
        let head: Vec<usize> = parse_row(header)?;
        let [dim, ncells, nverts] = head[..] else {
            return Err(Error::Parse(format!("bad header `{header}`")));
        };
        let mut vertices = Vec::with_capacity(nverts);
        for _ in 0..nverts {
            let line = lines.next().ok_or_else(|| Error::Parse("missing vertex line".into()))?;
            let x: Vec<f64> = parse_row(line)?;
            if x.len() != dim {
                return Err(Error::Parse(format!("vertex `{line}` needs {dim} coordinates")));
            }
            let mut p = Point::zeros();
            for (k, xk) in x.into_iter().enumerate() {
                p[k] = xk;
            }
            vertices.push(p);
        }
        let mut cells = Vec::with_capacity(ncells);
        for _ in 0..ncells {
            let line = lines.next().ok_or_else(|| Error::Parse("missing cell line".into()))?;
            cells.push(parse_row(line)?);
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing data after cells".into()));
        }
        SimplicialMesh::new(dim, vertices, cells)
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn read_text<R: Read>(mut r: R) -> Result<Self> {
        let mut s = String::new();
        r.read_to_string(&mut s)?;
        Self::from_text(&s)
    }
}

fn parse_row<T: std::str::FromStr>(line: &str) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("cannot parse `{t}`"))))
        .collect()
}
