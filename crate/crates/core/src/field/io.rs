//! Plain-text field dumps and 16-bit portable graymaps.
//!
//! Field format (UTF-8, whitespace separated):
//!
//! ```text
//! cebit-field 1
//! n <samples per axis>
//! pitch <meters>
//! w0 <meters>
//! components <k>
//! <re> <im>        # n*n lines per component, row-major, components in order
//! ```
//!
//! A [`VectorBeam`] is written as four components: upper-x, upper-y, lower-x,
//! lower-y.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path as FsPath;

use ndarray::Array2;
use num_complex::Complex;

use super::{GridSpec, ScalarField, VectorBeam};
use crate::scalar::Real;

const MAGIC: &str = "cebit-field 1";

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

pub fn write_fields<T: Real, W: Write>(mut w: W, fields: &[&ScalarField<T>]) -> io::Result<()> {
    let grid = match fields.first() {
        Some(f) => *f.grid(),
        None => return Err(invalid("no fields to write")),
    };
    if fields.iter().any(|f| *f.grid() != grid) {
        return Err(invalid("fields sampled on different grids"));
    }
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "n {}", grid.n())?;
    writeln!(w, "pitch {:e}", grid.pitch().as_f64())?;
    writeln!(w, "w0 {:e}", grid.waist().as_f64())?;
    writeln!(w, "components {}", fields.len())?;
    for f in fields {
        for z in f.samples().iter() {
            writeln!(w, "{:e} {:e}", z.re.as_f64(), z.im.as_f64())?;
        }
    }
    w.flush()
}

fn header_value<R: BufRead>(lines: &mut io::Lines<R>, key: &str) -> io::Result<String> {
    let line = lines.next().ok_or_else(|| invalid(format!("missing {key} line")))??;
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next()) {
        (Some(k), Some(v)) if k == key => Ok(v.to_string()),
        _ => Err(invalid(format!("expected `{key} <value>`, got {line:?}"))),
    }
}

fn parse<V: std::str::FromStr>(s: &str, what: &str) -> io::Result<V> {
    s.parse().map_err(|_| invalid(format!("bad {what}: {s:?}")))
}

pub fn read_fields<T: Real, R: BufRead>(r: R) -> io::Result<Vec<ScalarField<T>>> {
    let mut lines = r.lines();
    let magic = lines.next().ok_or_else(|| invalid("empty field file"))??;
    if magic.trim() != MAGIC {
        return Err(invalid(format!("not a field file (header {magic:?})")));
    }
    let n: usize = parse(&header_value(&mut lines, "n")?, "n")?;
    let pitch: f64 = parse(&header_value(&mut lines, "pitch")?, "pitch")?;
    let w0: f64 = parse(&header_value(&mut lines, "w0")?, "w0")?;
    let k: usize = parse(&header_value(&mut lines, "components")?, "components")?;
    let grid = GridSpec::new(n, T::lit(pitch), T::lit(w0)).map_err(|e| invalid(e.to_string()))?;
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let mut samples = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            let line = lines.next().ok_or_else(|| invalid("truncated sample block"))??;
            let mut it = line.split_whitespace();
            let re: f64 = parse(it.next().unwrap_or(""), "sample")?;
            let im: f64 = parse(it.next().unwrap_or(""), "sample")?;
            samples.push(Complex::new(T::lit(re), T::lit(im)));
        }
        let arr = Array2::from_shape_vec((n, n), samples).map_err(|e| invalid(e.to_string()))?;
        out.push(ScalarField::from_samples(grid, arr).map_err(|e| invalid(e.to_string()))?);
    }
    Ok(out)
}

impl<T: Real> ScalarField<T> {
    pub fn save_text(&self, path: impl AsRef<FsPath>) -> io::Result<()> {
        write_fields(BufWriter::new(File::create(path)?), &[self])
    }

    pub fn load_text(path: impl AsRef<FsPath>) -> io::Result<Self> {
        let mut v = read_fields(BufReader::new(File::open(path)?))?;
        if v.len() != 1 {
            return Err(invalid(format!("expected one component, found {}", v.len())));
        }
        Ok(v.remove(0))
    }
}

impl<T: Real> VectorBeam<T> {
    pub fn save_text(&self, path: impl AsRef<FsPath>) -> io::Result<()> {
        let c = self.components();
        write_fields(BufWriter::new(File::create(path)?), &[&c[0], &c[1], &c[2], &c[3]])
    }

    pub fn load_text(path: impl AsRef<FsPath>) -> io::Result<Self> {
        let v = read_fields(BufReader::new(File::open(path)?))?;
        let comps: [ScalarField<T>; 4] = v
            .try_into()
            .map_err(|v: Vec<_>| invalid(format!("expected four components, found {}", v.len())))?;
        VectorBeam::from_components(comps).map_err(|e| invalid(e.to_string()))
    }
}

/// Scale information written next to every graymap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgmScale {
    /// Intensity mapped to the full-scale value 65535.
    pub max_intensity: f64,
    /// Intensity units per gray level.
    pub scale: f64,
}

/// Encodes a non-negative intensity array as binary 16-bit PGM (`P5`,
/// big-endian, row-major), normalized to its maximum.
pub fn encode_pgm16<T: Real>(intensity: &Array2<T>) -> (Vec<u8>, PgmScale) {
    let (rows, cols) = intensity.dim();
    let max = intensity.iter().fold(0.0f64, |m, v| m.max(v.as_f64()));
    let scale = if max > 0.0 { max / 65535.0 } else { 0.0 };
    let mut out = format!("P5\n{cols} {rows}\n65535\n").into_bytes();
    out.reserve(rows * cols * 2);
    for v in intensity.iter() {
        let level = if scale > 0.0 {
            (v.as_f64().max(0.0) / scale).round().min(65535.0) as u16
        } else {
            0
        };
        out.extend_from_slice(&level.to_be_bytes());
    }
    (out, PgmScale { max_intensity: max, scale })
}

/// Writes `path` plus a sidecar `path.txt` holding the scale factor.
pub fn write_pgm16<T: Real>(path: impl AsRef<FsPath>, intensity: &Array2<T>) -> io::Result<PgmScale> {
    let path = path.as_ref();
    let (bytes, scale) = encode_pgm16(intensity);
    std::fs::write(path, bytes)?;
    let mut side = path.as_os_str().to_owned();
    side.push(".txt");
    let (rows, cols) = intensity.dim();
    std::fs::write(
        side,
        format!(
            "format pgm16\nrows {rows}\ncols {cols}\nmax_intensity {:e}\nscale {:e}\n",
            scale.max_intensity, scale.scale
        ),
    )?;
    Ok(scale)
}
