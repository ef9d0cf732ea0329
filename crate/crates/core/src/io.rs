//! On-disk formats for [`GridFunction`].
//!
//! Binary layout (all little-endian):
//!
//! | offset | size | field                         |
//! |--------|------|-------------------------------|
//! | 0      | 4    | magic `b"LPWG"`               |
//! | 4      | 1    | format version (1)            |
//! | 5      | 1    | dim (1 or 2)                  |
//! | 6      | 1    | tag (0 physical, 1 spectral)  |
//! | 7      | 1    | reserved (0)                  |
//! | 8      | 8    | samples per axis `S` (u64)    |
//! | 16     | 8    | period `L` (f64)              |
//! | 24     | 16 N | `N = S^dim` pairs (re, im) f64 |
//!
//! CSV layout: one comment line
//! `# lpweak-grid dim=<n> length=<L> samples=<S> tag=<physical|spectral>`,
//! a header `index,re,im`, then one row per sample in flat order.

use std::io::{BufRead, BufReader, Read, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, GridFunction};
use crate::scalar::{lit, to_f64, Real};

const MAGIC: &[u8; 4] = b"LPWG";
const VERSION: u8 = 1;

fn tag_byte(d: Domain) -> u8 {
    match d {
        Domain::Physical => 0,
        Domain::Spectral => 1,
    }
}

pub fn write_binary<T: Real, W: Write>(f: &GridFunction<T>, mut w: W) -> Result<()> {
    let g = f.grid();
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION, g.dim() as u8, tag_byte(f.domain()), 0])?;
    w.write_all(&(g.samples_per_axis() as u64).to_le_bytes())?;
    w.write_all(&to_f64(g.length()).to_le_bytes())?;
    for v in f.values() {
        w.write_all(&to_f64(v.re).to_le_bytes())?;
        w.write_all(&to_f64(v.im).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<T: Real, R: Read>(mut r: R) -> Result<GridFunction<T>> {
    let mut head = [0u8; 24];
    r.read_exact(&mut head)?;
    if &head[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    if head[4] != VERSION {
        return Err(Error::Format(format!("unsupported version {}", head[4])));
    }
    let domain = match head[6] {
        0 => Domain::Physical,
        1 => Domain::Spectral,
        t => return Err(Error::Format(format!("unknown tag {t}"))),
    };
    let samples = u64::from_le_bytes(head[8..16].try_into().unwrap()) as usize;
    let length = f64::from_le_bytes(head[16..24].try_into().unwrap());
    let grid = Grid::new(head[5] as usize, lit::<T>(length), samples)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut buf = [0u8; 16];
    for _ in 0..grid.len() {
        r.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
        values.push(Complex::new(lit::<T>(re), lit::<T>(im)));
    }
    GridFunction::from_values(grid, values, domain)
}

pub fn write_csv<T: Real, W: Write>(f: &GridFunction<T>, mut w: W) -> Result<()> {
    let g = f.grid();
    writeln!(
        w,
        "# lpweak-grid dim={} length={} samples={} tag={}",
        g.dim(),
        to_f64(g.length()),
        g.samples_per_axis(),
        f.domain().name()
    )?;
    writeln!(w, "index,re,im")?;
    for (i, v) in f.values().iter().enumerate() {
        writeln!(w, "{},{},{}", i, to_f64(v.re), to_f64(v.im))?;
    }
    Ok(())
}

pub fn read_csv<T: Real, R: Read>(r: R) -> Result<GridFunction<T>> {
    let mut lines = BufReader::new(r).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Format("empty file".into()))??;
    let rest = first
        .strip_prefix("# lpweak-grid ")
        .ok_or_else(|| Error::Format("missing grid header".into()))?;
    let (mut dim, mut length, mut samples, mut domain) = (None, None, None, None);
    for kv in rest.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header field {kv}")))?;
        let bad = |_| Error::Format(format!("bad value for {k}"));
        match k {
            "dim" => dim = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "length" => length = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "samples" => samples = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "tag" => {
                domain = Some(match v {
                    "physical" => Domain::Physical,
                    "spectral" => Domain::Spectral,
                    _ => return Err(Error::Format(format!("unknown tag {v}"))),
                })
            }
            _ => return Err(Error::Format(format!("unknown header field {k}"))),
        }
    }
    let missing = |name: &str| Error::Format(format!("header lacks {name}"));
    let grid = Grid::new(
        dim.ok_or_else(|| missing("dim"))?,
        lit::<T>(length.ok_or_else(|| missing("length"))?),
        samples.ok_or_else(|| missing("samples"))?,
    )?;
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("missing column header".into()))??;
    if header.trim() != "index,re,im" {
        return Err(Error::Format("unexpected column header".into()));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (expected, line) in lines.enumerate() {
        let line = line?;
        let mut cols = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.ok_or_else(|| Error::Format("short row".into()))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(e.to_string()))
        };
        let idx = parse(cols.next())? as usize;
        if idx != expected {
            return Err(Error::Format(format!("row {expected} has index {idx}")));
        }
        let re = parse(cols.next())?;
        let im = parse(cols.next())?;
        values.push(Complex::new(lit::<T>(re), lit::<T>(im)));
    }
    GridFunction::from_values(grid, values, domain.ok_or_else(|| missing("tag"))?)
}
