//! ASCII OFF and OBJ mesh files, triangles only.
//!
//! Coordinates are written with 17 significant digits so that
//! `load(save(m))` reproduces every vertex bit-for-bit.

use nalgebra::Vector3;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::mesh::Mesh;
use crate::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Format with 17 significant digits (exact f64 round-trip).
fn fmt_coord(x: f64) -> String {
    format!("{x:.16e}")
}

/// Dispatch on the file extension: `.off` or `.obj`.
pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
        Some(ext) if ext == "off" => save_off(mesh, path),
        Some(ext) if ext == "obj" => save_obj(mesh, path),
        other => Err(Error::InvalidArgument(format!(
            "unsupported mesh extension {other:?} (use .off or .obj)"
        ))),
    }
}

/// Dispatch on the file extension: `.off` or `.obj`.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
        Some(ext) if ext == "off" => load_off(path),
        Some(ext) if ext == "obj" => load_obj(path),
        other => Err(Error::InvalidArgument(format!(
            "unsupported mesh extension {other:?} (use .off or .obj)"
        ))),
    }
}

pub fn save_off(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} 0", mesh.vertex_count(), mesh.face_count())?;
    for v in mesh.vertices() {
        writeln!(w, "{} {} {}", fmt_coord(v.x), fmt_coord(v.y), fmt_coord(v.z))?;
    }
    for f in mesh.faces() {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_obj(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for v in mesh.vertices() {
        writeln!(w, "v {} {} {}", fmt_coord(v.x), fmt_coord(v.y), fmt_coord(v.z))?;
    }
    for f in mesh.faces() {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| parse_err(line, format!("expected number, got {tok:?}")))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>().map_err(|_| parse_err(line, format!("expected index, got {tok:?}")))
}

pub fn load_off(path: impl AsRef<Path>) -> Result<Mesh> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    // (line number, content) with comments and blanks stripped
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.split('#').next().unwrap_or("").trim().to_string();
        if !trimmed.is_empty() {
            lines.push((i + 1, trimmed));
        }
    }
    let mut it = lines.into_iter();
    let (ln, header) = it.next().ok_or_else(|| parse_err(1, "empty file"))?;
    if header != "OFF" {
        return Err(parse_err(ln, format!("expected OFF header, got {header:?}")));
    }
    let (ln, counts) = it.next().ok_or_else(|| parse_err(ln, "missing count line"))?;
    let toks: Vec<&str> = counts.split_whitespace().collect();
    if toks.len() < 2 {
        return Err(parse_err(ln, "count line needs vertex and face counts"));
    }
    let nv = parse_usize(toks[0], ln)?;
    let nf = parse_usize(toks[1], ln)?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = it.next().ok_or_else(|| parse_err(ln, "unexpected end of vertex list"))?;
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 3 {
            return Err(parse_err(ln, format!("expected 3 coordinates, got {}", t.len())));
        }
        vertices.push(Vector3::new(
            parse_f64(t[0], ln)?,
            parse_f64(t[1], ln)?,
            parse_f64(t[2], ln)?,
        ));
    }
    let mut faces = Vec::with_capacity(nf);
    let mut last_ln = ln;
    for _ in 0..nf {
        let (ln, l) = it.next().ok_or_else(|| parse_err(last_ln, "unexpected end of face list"))?;
        last_ln = ln;
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.is_empty() {
            return Err(parse_err(ln, "empty face line"));
        }
        let k = parse_usize(t[0], ln)?;
        if k != 3 {
            return Err(parse_err(ln, format!("non-triangular face at line {ln} ({k} vertices)")));
        }
        if t.len() != 4 {
            return Err(parse_err(ln, format!("expected 3 indices, got {}", t.len() - 1)));
        }
        faces.push([parse_usize(t[1], ln)?, parse_usize(t[2], ln)?, parse_usize(t[3], ln)?]);
    }
    Mesh::new(vertices, faces)
}

pub fn load_obj(path: impl AsRef<Path>) -> Result<Mesh> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut vertices = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut saw_any = false;
    for (i, line) in reader.lines().enumerate() {
        let ln = i + 1;
        let line = line?;
        let trimmed = line.split('#').next().unwrap_or("").trim();
        if trimmed.is_empty() {
            continue;
        }
        saw_any = true;
        let mut t = trimmed.split_whitespace();
        match t.next() {
            Some("v") => {
                let c: Vec<&str> = t.collect();
                if c.len() < 3 {
                    return Err(parse_err(ln, "vertex needs 3 coordinates"));
                }
                vertices.push(Vector3::new(
                    parse_f64(c[0], ln)?,
                    parse_f64(c[1], ln)?,
                    parse_f64(c[2], ln)?,
                ));
            }
            Some("f") => {
                let c: Vec<&str> = t.collect();
                if c.len() != 3 {
                    return Err(parse_err(
                        ln,
                        format!("non-triangular face at line {ln} ({} vertices)", c.len()),
                    ));
                }
                let mut idx = [0usize; 3];
                for (k, tok) in c.iter().enumerate() {
                    // "i", "i/t", "i/t/n" forms; only the position index is used
                    let first = tok.split('/').next().unwrap_or("");
                    let one_based = parse_usize(first, ln)?;
                    if one_based == 0 {
                        return Err(parse_err(ln, "face indices are 1-based"));
                    }
                    idx[k] = one_based - 1;
                }
                faces.push(idx);
            }
            // ignore other directives (vn, vt, o, g, s, usemtl, ...)
            Some(_) => {}
            None => {}
        }
    }
    if !saw_any {
        return Err(parse_err(1, "empty file"));
    }
    Mesh::new(vertices, faces)
}
