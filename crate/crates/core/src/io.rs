// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

//! CSV tables and metadata sidecars.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::observables::Trajectory;
use crate::sweep::SweepRow;

pub const TRAJECTORY_HEADER: [&str; 6] =
    ["t", "w_e", "n_ph", "purity", "trace_dev", "top_fock_pop"];
pub const SWEEP_HEADER: [&str; 6] = [
    "axis_value",
    "w_e_min",
    "w_e_max",
    "n_ph_mean",
    "stabilized",
    "status",
];

/// Seventeen significant digits in scientific notation, enough to
/// round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> io::Result<()> {
    w.flush()
}

pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory) -> io::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for s in &traj.samples {
        w.write_record(
            [s.t, s.w_e, s.n_ph, s.purity, s.trace_dev, s.top_fock_pop].map(format_float),
        )?;
    }
    finish(w)
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> io::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for row in rows {
        let (lo, hi, n) = match row.envelope {
            Some(e) => (
                format_float(e.w_e_min),
                format_float(e.w_e_max),
                format_float(e.n_ph_mean),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        w.write_record([
            format_float(row.axis_value),
            lo,
            hi,
            n,
            row.stabilized().to_string(),
            row.status.clone(),
        ])?;
    }
    finish(w)
}

/// `<path>.meta`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Resolved configuration preceded by run facts as comments, so the file
/// can be passed back as a config.
pub fn write_sidecar<W: Write>(
    mut out: W,
    config_text: &str,
    status: &str,
    wall_time: Duration,
) -> io::Result<()> {
    writeln!(out, "# casimir-sim {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(out, "# status: {status}")?;
    writeln!(out, "# wall_time_s: {:.3}", wall_time.as_secs_f64())?;
    out.write_all(config_text.as_bytes())?;
    out.flush()
}
