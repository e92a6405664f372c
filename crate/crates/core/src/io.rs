//! Text formats: CGRID fields, CHART sidecars, family manifests and OBJ meshes.
//!
//! Every reader skips leading lines that start with `#`, so writers may put
//! provenance comments (for instance a configuration hash) at the top.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::grid::{ComplexGrid, Grid, Lattice, RealGrid};
use crate::{Error, Result, C64};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn write_comments<W: Write>(w: &mut W, comments: &[String]) -> std::io::Result<()> {
    for c in comments {
        for line in c.lines() {
            writeln!(w, "# {line}")?;
        }
    }
    Ok(())
}

/// Lines after the leading comment block, numbered from 1 in the source.
fn content_lines<R: BufRead>(r: R) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    let mut in_header = true;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if in_header && line.starts_with('#') {
            continue;
        }
        in_header = false;
        if line.trim().is_empty() {
            continue;
        }
        out.push((i + 1, line));
    }
    Ok(out)
}

fn parse_f64(tok: Option<&str>, line: usize, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse::<f64>()
        .map_err(|e| parse_err(line, format!("bad {what} '{tok}': {e}")))
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse::<usize>()
        .map_err(|e| parse_err(line, format!("bad {what} '{tok}': {e}")))
}

/// Writes `CGRID v1` with 17 significant digits, which round-trips bit-exactly.
pub fn write_cgrid<W: Write>(w: &mut W, grid: &ComplexGrid, comments: &[String]) -> std::io::Result<()> {
    let lat = grid.lattice();
    write_comments(w, comments)?;
    writeln!(
        w,
        "CGRID v1 {:.16e} {:.16e} {:.16e} {} {}",
        lat.origin.re, lat.origin.im, lat.spacing, lat.nx, lat.ny
    )?;
    for (v, m) in grid.samples().iter().zip(grid.mask()) {
        writeln!(w, "{:.16e} {:.16e} {}", v.re, v.im, u8::from(*m))?;
    }
    Ok(())
}

pub fn read_cgrid<R: BufRead>(r: R) -> Result<ComplexGrid> {
    let lines = content_lines(r)?;
    let (hline, header) = lines.first().ok_or_else(|| parse_err(1, "empty CGRID file"))?;
    let mut t = header.split_whitespace();
    if t.next() != Some("CGRID") || t.next() != Some("v1") {
        return Err(parse_err(*hline, "expected 'CGRID v1' header"));
    }
    let ore = parse_f64(t.next(), *hline, "origin_re")?;
    let oim = parse_f64(t.next(), *hline, "origin_im")?;
    let h = parse_f64(t.next(), *hline, "spacing")?;
    let nx = parse_usize(t.next(), *hline, "nx")?;
    let ny = parse_usize(t.next(), *hline, "ny")?;
    let lattice = Lattice::new(C64::new(ore, oim), h, nx, ny)
        .map_err(|e| parse_err(*hline, e.to_string()))?;
    let body = &lines[1..];
    if body.len() != lattice.len() {
        return Err(parse_err(
            body.last().map_or(*hline, |l| l.0),
            format!("expected {} sample lines, found {}", lattice.len(), body.len()),
        ));
    }
    let mut samples = Vec::with_capacity(lattice.len());
    let mut mask = Vec::with_capacity(lattice.len());
    for (ln, line) in body {
        let mut t = line.split_whitespace();
        let re = parse_f64(t.next(), *ln, "re")?;
        let im = parse_f64(t.next(), *ln, "im")?;
        let m = match t.next() {
            Some("0") => false,
            Some("1") => true,
            other => return Err(parse_err(*ln, format!("mask must be 0 or 1, got {other:?}"))),
        };
        samples.push(C64::new(re, im));
        mask.push(m);
    }
    Grid::new(lattice, samples, mask)
}

pub fn save_cgrid(path: &Path, grid: &ComplexGrid, comments: &[String]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_cgrid(&mut w, grid, comments)?;
    w.flush()?;
    Ok(())
}

pub fn load_cgrid(path: &Path) -> Result<ComplexGrid> {
    read_cgrid(BufReader::new(File::open(path)?))
}

pub fn save_real(path: &Path, grid: &RealGrid, comments: &[String]) -> Result<()> {
    save_cgrid(path, &grid.to_complex(), comments)
}

pub fn load_real(path: &Path) -> Result<RealGrid> {
    Ok(load_cgrid(path)?.real_part())
}

/// Summary line stored next to a chart's CGRID file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartSidecar {
    pub residual: f64,
    pub iterations: usize,
    pub contraction: f64,
    pub jacobian_min: f64,
}

impl ChartSidecar {
    pub fn line(&self) -> String {
        format!(
            "CHART v1 residual={:e} iterations={} contraction={:e} jacobian_min={:e}",
            self.residual, self.iterations, self.contraction, self.jacobian_min
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines = content_lines(text.as_bytes())?;
        let (ln, line) = lines.first().ok_or_else(|| parse_err(1, "empty CHART file"))?;
        let mut t = line.split_whitespace();
        if t.next() != Some("CHART") || t.next() != Some("v1") {
            return Err(parse_err(*ln, "expected 'CHART v1' header"));
        }
        let mut out = ChartSidecar { residual: f64::NAN, iterations: 0, contraction: f64::NAN, jacobian_min: f64::NAN };
        let mut seen = 0;
        for tok in t {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| parse_err(*ln, format!("expected key=value, got '{tok}'")))?;
            match k {
                "residual" => out.residual = parse_f64(Some(v), *ln, k)?,
                "iterations" => out.iterations = parse_usize(Some(v), *ln, k)?,
                "contraction" => out.contraction = parse_f64(Some(v), *ln, k)?,
                "jacobian_min" => out.jacobian_min = parse_f64(Some(v), *ln, k)?,
                _ => return Err(parse_err(*ln, format!("unknown CHART field '{k}'"))),
            }
            seen += 1;
        }
        if seen != 4 {
            return Err(parse_err(*ln, "CHART line needs residual, iterations, contraction, jacobian_min"));
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path, comments: &[String]) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        write_comments(&mut w, comments)?;
        writeln!(w, "{}", self.line())?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        ChartSidecar::parse(&std::fs::read_to_string(path)?)
    }
}

/// Parameter values paired with per-fiber file paths.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyManifest {
    pub entries: Vec<(f64, String)>,
}

impl FamilyManifest {
    pub fn write<W: Write>(&self, w: &mut W, comments: &[String]) -> std::io::Result<()> {
        write_comments(w, comments)?;
        writeln!(w, "FAMILY v1 {}", self.entries.len())?;
        for (b, p) in &self.entries {
            writeln!(w, "{b:.16e} {p}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let lines = content_lines(r)?;
        let (hl, header) = lines.first().ok_or_else(|| parse_err(1, "empty manifest"))?;
        let mut t = header.split_whitespace();
        if t.next() != Some("FAMILY") || t.next() != Some("v1") {
            return Err(parse_err(*hl, "expected 'FAMILY v1' header"));
        }
        let m = parse_usize(t.next(), *hl, "fiber count")?;
        if lines.len() - 1 != m {
            return Err(parse_err(*hl, format!("header announces {m} fibers, found {}", lines.len() - 1)));
        }
        let mut entries = Vec::with_capacity(m);
        for (ln, line) in &lines[1..] {
            let (b, p) = line
                .trim()
                .split_once(char::is_whitespace)
                .ok_or_else(|| parse_err(*ln, "expected '<parameter> <path>'"))?;
            entries.push((parse_f64(Some(b), *ln, "parameter")?, p.trim().to_string()));
        }
        Ok(FamilyManifest { entries })
    }

    pub fn save(&self, path: &Path, comments: &[String]) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w, comments)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        FamilyManifest::read(BufReader::new(File::open(path)?))
    }
}

/// Writes a lattice surface as Wavefront OBJ: one vertex per node in
/// row-major order, two triangles per cell whose four corners are in `mask`.
pub fn write_obj<W: Write>(
    w: &mut W,
    lattice: &Lattice,
    vertices: &[[f64; 3]],
    mask: &[bool],
    comments: &[String],
) -> std::io::Result<()> {
    write_comments(w, comments)?;
    for v in vertices {
        writeln!(w, "v {:.16e} {:.16e} {:.16e}", v[0], v[1], v[2])?;
    }
    for r in 0..lattice.ny - 1 {
        for c in 0..lattice.nx - 1 {
            let a = lattice.index(r, c);
            let b = lattice.index(r, c + 1);
            let d = lattice.index(r + 1, c);
            let e = lattice.index(r + 1, c + 1);
            if mask[a] && mask[b] && mask[d] && mask[e] {
                writeln!(w, "f {} {} {}", a + 1, b + 1, e + 1)?;
                writeln!(w, "f {} {} {}", a + 1, e + 1, d + 1)?;
            }
        }
    }
    Ok(())
}

pub fn save_obj(
    path: &Path,
    lattice: &Lattice,
    vertices: &[[f64; 3]],
    mask: &[bool],
    comments: &[String],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_obj(&mut w, lattice, vertices, mask, comments)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cgrid_round_trip_is_bit_exact() {
        let lat = Lattice::new(C64::new(-0.1, 0.7), 1.0 / 3.0, 4, 3).unwrap();
        let g = ComplexGrid::from_fn(lat, |z| (z * 1.234567891234).exp() / 7.0);
        let mask: Vec<bool> = (0..lat.len()).map(|k| k % 3 != 0).collect();
        let g = g.with_mask(mask).unwrap();
        let mut buf = Vec::new();
        write_cgrid(&mut buf, &g, &["config abc".into()]).unwrap();
        let back = read_cgrid(&buf[..]).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn cgrid_errors_name_lines() {
        let text = "CGRID v1 0 0 1 2 2\n0 0 1\n0 0 1\n0 x 1\n0 0 1\n";
        match read_cgrid(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(read_cgrid("CGRID v1 0 0 1 2 2\n0 0 1\n".as_bytes()).is_err());
    }

    #[test]
    fn sidecar_and_manifest_round_trip() {
        let s = ChartSidecar { residual: 1.5e-13, iterations: 12, contraction: 0.078, jacobian_min: 0.4 };
        assert_eq!(ChartSidecar::parse(&format!("# hash\n{}\n", s.line())).unwrap(), s);
        let m = FamilyManifest { entries: vec![(0.0, "a.cgrid".into()), (0.25, "b c.cgrid".into())] };
        let mut buf = Vec::new();
        m.write(&mut buf, &[]).unwrap();
        assert_eq!(FamilyManifest::read(&buf[..]).unwrap(), m);
    }

    #[test]
    fn obj_has_two_triangles_per_cell() {
        let lat = Lattice::new(C64::new(0.0, 0.0), 1.0, 3, 2).unwrap();
        let verts: Vec<[f64; 3]> = (0..6).map(|k| [k as f64, 0.0, 0.0]).collect();
        let mut buf = Vec::new();
        write_obj(&mut buf, &lat, &verts, &[true; 6], &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 6);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 4);
    }
}
