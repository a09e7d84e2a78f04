//! CSV and JSON persistence with stable schemas.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! inputs give byte-identical files and every value rereads exactly.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use nsl_core::{SimState, TraceRow};

/// `t,M,N,mass,umin,umax`, one row per sampled step.
pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,M,N,mass,umin,umax")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{}", r.t, r.m_slope, r.n_slope, r.mass, r.u_min, r.u_max)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}

/// `x,u,ubar,ux`, one row per cell, at the state's current time.
pub fn write_snapshot_csv(path: &Path, s: &SimState) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x,u,ubar,ux")?;
    for i in 0..s.grid.n_cells() {
        writeln!(w, "{},{},{},{}", s.grid.cell_center(i), s.u[i], s.ubar[i], s.ux[i])?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .with_context(|| format!("serializing {}", path.display()))?;
    writeln!(w)?;
    w.flush().with_context(|| format!("writing {}", path.display()))
}

/// Quotes a CSV field when it contains separators or quotes.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}
