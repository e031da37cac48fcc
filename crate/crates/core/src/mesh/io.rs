//! `POLYMESH 1` text format.
//!
//! ```text
//! POLYMESH 1
//! VERTICES n
//! x y z
//! FACES m
//! k v1 ... vk
//! CELLS p
//! k f1 ... fk          (a leading '-' marks a face whose normal points into the cell)
//! FRACTURE q
//! face_id nx ny nz pos_cell_id g
//! ```
//!
//! Indices are 0-based. Coordinates are written with the shortest
//! representation that round-trips exactly.

use std::io::{BufRead, Write};

use super::{FractureFace, FractureNetwork, Point3, PolyMesh};
use crate::error::{Error, Result};

pub fn write_polymesh<W: Write>(mut out: W, mesh: &PolyMesh, fracture: &FractureNetwork) -> Result<()> {
    writeln!(out, "POLYMESH 1")?;
    writeln!(out, "VERTICES {}", mesh.num_vertices())?;
    for v in &mesh.vertices {
        writeln!(out, "{:?} {:?} {:?}", v.x, v.y, v.z)?;
    }
    writeln!(out, "FACES {}", mesh.num_faces())?;
    for f in &mesh.faces {
        write!(out, "{}", f.vertices.len())?;
        for v in &f.vertices {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    writeln!(out, "CELLS {}", mesh.num_cells())?;
    for c in &mesh.cells {
        write!(out, "{}", c.faces.len())?;
        for (f, o) in c.faces.iter().zip(&c.orientations) {
            if *o > 0.0 {
                write!(out, " {f}")?;
            } else {
                write!(out, " -{f}")?;
            }
        }
        writeln!(out)?;
    }
    writeln!(out, "FRACTURE {}", fracture.len())?;
    for ff in &fracture.faces {
        writeln!(
            out,
            "{} {:?} {:?} {:?} {} {:?}",
            ff.face, ff.normal.x, ff.normal.y, ff.normal.z, ff.positive_cell, ff.threshold
        )?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_tokens(&mut self) -> Result<Vec<String>> {
        loop {
            self.line += 1;
            let l = self
                .inner
                .next()
                .ok_or_else(|| self.err("unexpected end of file"))??;
            let toks: Vec<String> = l.split_whitespace().map(str::to_owned).collect();
            if !toks.is_empty() {
                return Ok(toks);
            }
        }
    }

    fn err(&self, message: &str) -> Error {
        Error::Parse {
            line: self.line,
            message: message.to_owned(),
        }
    }

    fn section(&mut self, name: &str) -> Result<usize> {
        let t = self.next_tokens()?;
        if t.len() != 2 || t[0] != name {
            return Err(self.err(&format!("expected `{name} <count>`")));
        }
        t[1].parse().map_err(|_| self.err("bad section count"))
    }

    fn num<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(&format!("cannot parse `{s}`")))
    }
}

pub fn read_polymesh<R: BufRead>(input: R) -> Result<(PolyMesh, FractureNetwork)> {
    let mut lines = Lines {
        inner: input.lines(),
        line: 0,
    };
    let header = lines.next_tokens()?;
    if header != ["POLYMESH", "1"] {
        return Err(lines.err("expected header `POLYMESH 1`"));
    }
    let nv = lines.section("VERTICES")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let t = lines.next_tokens()?;
        if t.len() != 3 {
            return Err(lines.err("vertex line needs 3 coordinates"));
        }
        vertices.push(Point3::new(lines.num(&t[0])?, lines.num(&t[1])?, lines.num(&t[2])?));
    }
    let nf = lines.section("FACES")?;
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let t = lines.next_tokens()?;
        let k: usize = lines.num(&t[0])?;
        if t.len() != k + 1 {
            return Err(lines.err("face vertex count mismatch"));
        }
        faces.push(t[1..].iter().map(|s| lines.num(s)).collect::<Result<Vec<usize>>>()?);
    }
    let nc = lines.section("CELLS")?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let t = lines.next_tokens()?;
        let k: usize = lines.num(&t[0])?;
        if t.len() != k + 1 {
            return Err(lines.err("cell face count mismatch"));
        }
        let mut fs = Vec::with_capacity(k);
        for s in &t[1..] {
            match s.strip_prefix('-') {
                Some(rest) => fs.push((lines.num(rest)?, false)),
                None => fs.push((lines.num(s)?, true)),
            }
        }
        cells.push(fs);
    }
    let nq = lines.section("FRACTURE")?;
    let mut raw = Vec::with_capacity(nq);
    for _ in 0..nq {
        let t = lines.next_tokens()?;
        if t.len() != 6 {
            return Err(lines.err("fracture line needs 6 fields"));
        }
        let face: usize = lines.num(&t[0])?;
        let normal = Point3::new(lines.num(&t[1])?, lines.num(&t[2])?, lines.num(&t[3])?);
        let pos: usize = lines.num(&t[4])?;
        let g: f64 = lines.num(&t[5])?;
        raw.push((face, normal, pos, g));
    }
    let mesh = PolyMesh::from_parts(vertices, faces, cells)?;
    let mut out = Vec::with_capacity(raw.len());
    for (face, normal, pos, g) in raw {
        let fc = mesh
            .faces
            .get(face)
            .ok_or_else(|| Error::InvalidParameter(format!("fracture face {face} does not exist")))?;
        let neg = fc
            .cells
            .iter()
            .copied()
            .find(|&c| c != pos)
            .ok_or_else(|| Error::InvalidParameter(format!("fracture face {face} is not interior")))?;
        out.push(FractureFace {
            face,
            normal,
            positive_cell: pos,
            negative_cell: neg,
            threshold: g,
        });
    }
    let fracture = FractureNetwork::new(out);
    fracture.check(&mesh)?;
    Ok((mesh, fracture))
}
