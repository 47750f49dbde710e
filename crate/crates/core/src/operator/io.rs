//! Grid function files.
//!
//! Binary layout: one JSON header line followed by the values as
//! little-endian `f64`, row-major (last axis fastest).

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::grid::{Grid, GridFunction};
use crate::error::{Error, Result};
use crate::geometry::BoxSpec;

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    #[serde(rename = "box")]
    bx: BoxSpec,
    n_per_side: usize,
    len: usize,
}

const FORMAT: &str = "ucp-lab-gridfunction-v1";

pub fn write_binary<W: Write>(f: &GridFunction, mut w: W) -> Result<()> {
    let header = Header {
        format: FORMAT.into(),
        bx: f.grid.bx.clone(),
        n_per_side: f.grid.n_per_side,
        len: f.values.len(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for v in &f.values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: BufRead>(mut r: R) -> Result<GridFunction> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: Header = serde_json::from_str(line.trim_end())?;
    if header.format != FORMAT {
        return Err(Error::InvalidInput(format!("unknown grid function format `{}`", header.format)));
    }
    let grid = Grid::new(header.bx, header.n_per_side)?;
    let mut values = Vec::with_capacity(header.len);
    let mut buf = [0u8; 8];
    for _ in 0..header.len {
        r.read_exact(&mut buf)?;
        values.push(f64::from_le_bytes(buf));
    }
    GridFunction::new(grid, values)
}

/// CSV with columns `x0, …, x{d-1}, value`.
pub fn write_csv<W: Write>(f: &GridFunction, mut w: W) -> Result<()> {
    let d = f.grid.dim();
    let cols: Vec<String> = (0..d).map(|a| format!("x{a}")).chain(["value".to_string()]).collect();
    writeln!(w, "{}", cols.join(","))?;
    for (i, v) in f.values.iter().enumerate() {
        let x = f.grid.coords(i);
        let mut row: Vec<String> = x.iter().map(|c| format!("{c:.16e}")).collect();
        row.push(format!("{v:.16e}"));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
