//! CSV emission. Per-step data always uses the one fixed schema; floats
//! are written with Rust's shortest round-trip formatting, so re-parsing a
//! column reproduces the doubles exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chsplit_core::harness::{RunDiagnostics, StepRecord};

pub const DIAGNOSTICS_HEADER: &str =
    "step,time,mass,E,E1_quad,E1_pot,E1,linf,h1,hk0,inc_l2,cert_lhs,cert_rhs,cert_ok";

fn io_err(path: &Path, what: impl std::fmt::Display) -> String {
    format!("cannot write {}: {what}", path.display())
}

pub fn format_record(r: &StepRecord) -> String {
    let (cert_lhs, cert_rhs, cert_ok) = match r.cert {
        Some(c) => (c.lhs, c.rhs, if c.satisfied { 1 } else { 0 }),
        None => (f64::NAN, f64::NAN, 0),
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.step,
        r.time,
        r.mass,
        r.e_classical,
        r.e1_quadratic,
        r.e1_potential,
        r.e1_total,
        r.linf,
        r.h1,
        r.hk0,
        r.inc_l2,
        cert_lhs,
        cert_rhs,
        cert_ok
    )
}

/// Write the per-step diagnostics; unstable runs get a trailing comment
/// line naming the aborting step.
pub fn write_diagnostics(d: &RunDiagnostics, path: &Path) -> Result<(), String> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{DIAGNOSTICS_HEADER}").map_err(|e| io_err(path, e))?;
    for r in &d.records {
        writeln!(w, "{}", format_record(r)).map_err(|e| io_err(path, e))?;
    }
    if let Some(step) = d.unstable_at {
        writeln!(w, "# unstable: blow-up guard tripped at step {step}")
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Write a simple table with a header row, one comment line per note.
pub fn write_table(
    path: &Path,
    header: &str,
    rows: &[String],
    notes: &[String],
) -> Result<(), String> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{header}").map_err(|e| io_err(path, e))?;
    for row in rows {
        writeln!(w, "{row}").map_err(|e| io_err(path, e))?;
    }
    for note in notes {
        writeln!(w, "# {note}").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}
